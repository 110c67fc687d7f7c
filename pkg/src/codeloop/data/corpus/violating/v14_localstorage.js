localStorage.setItem('stolen', JSON.stringify(app.library.favorites()));
