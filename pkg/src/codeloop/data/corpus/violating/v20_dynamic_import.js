import('fs').then(m => console.log(m));
