const lib = app.library;
lib.favorites = [];
