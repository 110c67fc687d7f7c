function wipe(target) {
  target.favorites = [];
}
wipe(app.library);
