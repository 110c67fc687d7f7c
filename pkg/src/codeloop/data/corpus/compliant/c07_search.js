const hits = app.library.search('rain');
console.log('found', hits.length, 'tracks');
