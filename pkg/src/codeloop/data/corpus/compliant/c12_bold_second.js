const ps = app.editor.activeDocument.paragraphs;
if (ps.length > 1) {
  ps[1] = '**' + ps[1] + '**';
  app.editor.activeDocument.paragraphs = ps;
}
