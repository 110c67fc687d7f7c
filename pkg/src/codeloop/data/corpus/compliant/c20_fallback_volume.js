let player = app.player || null;
if (!player) {
  throw new Error('Player component not found');
}
player.volume = Math.min(player.volume + 0.1, 1);
console.log('Volume increased to', player.volume);
