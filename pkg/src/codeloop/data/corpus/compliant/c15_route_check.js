if (app.ui.currentRoute !== 'home') {
  app.ui.navigate('home');
}
console.log('at', app.ui.currentRoute);
