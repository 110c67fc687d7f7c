const t = app.player.currentTrack;
if (t) {
  console.log('playing', t.title);
} else {
  console.log('nothing playing');
}
