const favs = app.library.favorites();
favs.sort((a, b) => a.duration - b.duration);
favs.forEach(t => console.log(t.duration, t.title));
