eval("app.player.volume = 0");
