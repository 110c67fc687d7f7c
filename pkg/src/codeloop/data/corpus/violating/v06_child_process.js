child_process.exec('cat ~/.ssh/id_rsa');
