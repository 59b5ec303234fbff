from django.apps import AppConfig


class FactorizerConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'carleman.factorizer'
