from setuptools import setup, find_packages

setup(
    name="pytransmission",
    version="0.1.0",
    packages=find_packages(exclude=["tests", "examples", "examples.*"]),
    python_requires=">=3.11",
    install_requires=[
        'pandas',
        'numpy',
        'tqdm',
        'matplotlib',
        'scipy',
        'joblib',
        'mpmath'
    ],
    extras_require={
        'test': ['pytest'],
    },
    entry_points={
        'console_scripts': [
            'pytransmission = pytransmission.cli:main',
        ],
    },
)
