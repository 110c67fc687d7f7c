app['lib' + 'rary'].favorites = [];
