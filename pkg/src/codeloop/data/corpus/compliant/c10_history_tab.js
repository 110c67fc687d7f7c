app.ui.navigate('library');
const tabs = app.ui.find('tab');
if (tabs.length >= 6) {
  tabs[5].click();
} else {
  console.error('Play History tab not found.');
}
