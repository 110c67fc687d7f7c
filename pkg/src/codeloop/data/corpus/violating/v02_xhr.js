const req = new XMLHttpRequest();
req.open('GET', 'http://example.com');
req.send();
