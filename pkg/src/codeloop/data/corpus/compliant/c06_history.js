const h = app.library.history();
console.log('history size', h.length);
