console.log(JSON.stringify(app.player.currentTrack));
