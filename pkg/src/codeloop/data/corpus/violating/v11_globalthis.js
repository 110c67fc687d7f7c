globalThis.leaked = app;
