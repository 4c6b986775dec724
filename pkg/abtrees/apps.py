from django.apps import AppConfig


class AbtreesConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'abtrees'
    verbose_name = '(a,b)-tree experiments'
