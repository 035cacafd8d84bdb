import os

import django

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'extremal_lab.settings')
django.setup()
