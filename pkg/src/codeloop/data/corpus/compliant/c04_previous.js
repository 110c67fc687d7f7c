const t = app.player.previous();
console.log('Went back to', t.title);
