from setuptools import setup, find_packages

setup(
    name='fastdiff',
    version='1.0',

    description='A numerical laboratory for extinction in fractional fast diffusion.',
    long_description=open('README.rst').read(),

    author='the fastdiff developers',

    license='GNU',

    packages=find_packages(exclude=['docs', 'test', 'test.*', 'examples',
                                    'examples.*']),

    install_requires=[
        'numpy',
        'scipy',
        'pytest',
        'pytest-xdist',
    ],

    entry_points={
        'console_scripts': [
            'fastdiff=fdcmd.fastdiff_launcher:main',
        ],
    },
)
