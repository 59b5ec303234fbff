import os
import sys


def main():
    """carleman <command> [flags], the installed console script"""
    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'carleman.settings')
    from django.core.management import execute_from_command_line
    execute_from_command_line(sys.argv)


if __name__ == '__main__':
    main()
