const tabs = document.querySelectorAll('.tabs .tab');
tabs[5].click();
