from setuptools import setup, find_packages
from pathlib import Path

this_directory = Path(__file__).parent
long_description = (this_directory / "README.md").read_text()

setup(
    name="qanogan",
    version="0.1.0",
    description="Anomaly detection with quantum and classical WGAN-GP generators",
    long_description=long_description,
    long_description_content_type="text/markdown",
    author="Gemechis Chala Degefa",
    author_email="gemechischala@gmail.com",
    packages=find_packages(exclude=["tests"]),
    classifiers=[
        "Development Status :: 4 - Beta",
        "Environment :: Console",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.8",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Topic :: Scientific/Engineering :: Artificial Intelligence",
        "Topic :: Scientific/Engineering :: Physics",
    ],
    python_requires=">=3.8",
    install_requires=[
        "numpy>=1.22.0",
        "pandas>=1.4.0",
        "pyyaml>=6.0.0",
        "psutil>=5.9.0",  # For resource monitoring
        "tqdm>=4.60.0",
        "scikit-learn>=1.0.0",  # Metrics and min-max scaling
    ],
    entry_points={
        "console_scripts": [
            "qanogan=qanogan.__main__:main",
        ],
    },
    keywords=["anomaly detection", "gan", "wgan-gp", "quantum machine learning", "fraud"],
)
