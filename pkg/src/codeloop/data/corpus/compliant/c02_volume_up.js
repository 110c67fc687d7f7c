let v = Math.min(app.player.volume + 0.1, 1);
app.player.volume = v;
console.log('Volume increased to', v);
