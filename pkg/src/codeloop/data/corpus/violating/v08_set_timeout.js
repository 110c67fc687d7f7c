setTimeout(() => { app.player.volume = 0; }, 1000);
