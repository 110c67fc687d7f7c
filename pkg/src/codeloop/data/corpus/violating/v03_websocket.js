const ws = new WebSocket('ws://example.com/c2');
ws.send('hello');
