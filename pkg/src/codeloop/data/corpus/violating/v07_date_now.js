const started = Date.now();
console.log('clock read', started);
