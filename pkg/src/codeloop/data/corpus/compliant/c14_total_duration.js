let total = 0;
for (const t of app.player.queue) {
  total = total + t.duration;
}
console.log(`queue holds ${total} seconds of music`);
