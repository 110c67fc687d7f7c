console.log('Current volume is', app.player.volume);
