#!/usr/bin/env python3
#
# Part of the "partialmac" Python library

from .cli import main

if __name__ == "__main__":
    main()
