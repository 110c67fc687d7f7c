const f = new Function('return app');
f();
