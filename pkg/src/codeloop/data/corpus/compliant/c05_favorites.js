app.library.favorites().forEach(t => console.log('fav:', t.title));
