app.library.favorites = [];
console.log('favorites cleared');
