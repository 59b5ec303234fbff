from setuptools import find_packages, setup

setup(
    name='carleman',
    version='0.1.0',
    description='Denjoy-Carleman weights, entire multipliers and explicit convolution factorization',
    packages=find_packages(include=['carleman', 'carleman.*']),
    python_requires='>=3.10',
    install_requires=[
        'Django==5.0.6',
        'python-decouple==3.8',
        'numpy',
        'scipy',
        'pandas',
    ],
    entry_points={
        'console_scripts': ['carleman=carleman.__main__:main'],
    },
)
