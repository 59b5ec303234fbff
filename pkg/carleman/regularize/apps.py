from django.apps import AppConfig


class RegularizeConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'carleman.regularize'
