#!/usr/bin/env python
# -*- coding: utf-8 -*-


"""
Convenience wrapper for running the development version of the mrkit CLI
without installing. With the root directory of this repository as CWD, mrkit
can be invoked via

$ python mrkit-runner.py verify --data test/data/data2.json


The canonical way would be:

$ python -m mrkit.main


Note: after installation with setuptools, an `mrkit` command is available:

$ python setup.py install; mrkit --help

"""


from mrkit.main import main


if __name__ == '__main__':
    main()
