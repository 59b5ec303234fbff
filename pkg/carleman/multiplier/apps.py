from django.apps import AppConfig


class MultiplierConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'carleman.multiplier'
