app.editor.fontSize = app.editor.fontSize + 2;
console.log('font size', app.editor.fontSize);
