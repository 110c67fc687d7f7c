const src = app.editor.activeDocument.paragraphs;
const id = app.editor.openTab('Excerpt', src.slice(0, 3));
console.log('opened', id);
