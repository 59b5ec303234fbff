# Denjoy-Carleman factorization toolkit
import os

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'carleman.settings')

__version__ = '0.1.0'
