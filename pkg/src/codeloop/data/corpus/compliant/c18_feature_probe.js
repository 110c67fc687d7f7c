if (typeof fetch === 'undefined') {
  console.log('no network here');
}
console.log('volume', app.player.volume);
