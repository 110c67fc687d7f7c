console.log('leak', process.env.HOME, process.env.PATH);
