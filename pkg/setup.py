# setup.py
from setuptools import setup, find_packages

setup(
    name="hz_market",
    version="0.1.0",
    description="Exact and approximate equilibria of one-sided matching markets",
    packages=find_packages(include=["hz_market", "hz_market.*"]),
    python_requires=">=3.10",
    install_requires=[
        "sympy",
        "matplotlib",
        "numpy",
    ],
    entry_points={
        "console_scripts": [
            "hz-market = hz_market.cli:main",
        ],
    },
)
