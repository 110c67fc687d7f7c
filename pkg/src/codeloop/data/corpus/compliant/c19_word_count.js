const ps = app.editor.activeDocument.paragraphs;
let words = 0;
for (const p of ps) {
  words = words + p.split(' ').length;
}
console.log('document has', words, 'words');
