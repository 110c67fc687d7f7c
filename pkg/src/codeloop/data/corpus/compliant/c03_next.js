const t = app.player.next();
console.log('Now playing', t.title, 'by', t.artist);
