from setuptools import setup

setup(
    name          = 'dppmle',
    version       = '0.1',
    license       = 'BSD 3-Clause License',
    description   = 'Maximum likelihood estimation for rank-2 projection DPPs via monodromy and parameter homotopy',
    packages      = ['dppmle'],
    package_data  = {'dppmle': ['data/config']},
    zip_safe      = False,
    install_requires = [
        'numpy>=1.17',
        'scipy>=1.1',
        ],
    tests_require = ['mock'],
    scripts       = [
        'bin/dppmle',
        ],
    )
