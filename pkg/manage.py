#!/usr/bin/env python
"""Utilitário de linha de comando do laboratório de sistemas extremais.

Exemplos:
    python manage.py solve --config configs/gelfand.json --lambda 1
    python manage.py trace --config configs/exp_cruzado_m2.json --jobs 4
    python manage.py test sistemas
"""
import os
import sys


def main():
    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'extremal_lab.settings')
    try:
        from django.core.management import execute_from_command_line
    except ImportError as exc:
        raise ImportError(
            "Django não encontrado. Ative o ambiente virtual e rode "
            "`pip install -r requirements.txt` antes de usar o manage.py."
        ) from exc
    execute_from_command_line(sys.argv)


if __name__ == '__main__':
    main()
