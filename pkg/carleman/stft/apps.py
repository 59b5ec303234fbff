from django.apps import AppConfig


class StftConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'carleman.stft'
