console.log(app.player.queue.map(t => t.title).join(', '));
