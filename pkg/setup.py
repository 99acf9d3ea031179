"""
Setup configuration for isp-signaling
"""

from setuptools import setup, find_packages

setup(
    name="isp-signaling",
    version="1.0.0",
    description="Equilibria, side payments and bargaining in the ISP-CP demand signaling game",
    author="isp-signaling developers",
    packages=find_packages(include=['isp_signaling', 'isp_signaling.*']),
    python_requires='>=3.9',
    install_requires=[
        'numpy>=1.24.0',
        'scipy>=1.10.0',
        'pydantic>=2.5.0',
        'pydantic-settings>=2.0.0',
        'python-dotenv>=1.0.0',
        'PyYAML>=6.0',
    ],
    extras_require={
        'dev': [
            'pytest>=7.4.3',
            'pytest-cov>=4.1.0',
            'black>=23.11.0',
            'ruff>=0.1.6',
            'mypy>=1.7.0',
        ],
    },
    entry_points={
        'console_scripts': [
            'isp-signaling=isp_signaling.cli.main:main',
        ],
    },
)
