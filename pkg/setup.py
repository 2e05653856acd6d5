import setuptools

with open("README.md", "r") as fh:
    long_description = fh.read()

requirements = [
    'numpy',
    'scipy',
    'pyparsing>=3.0',
    'pyyaml',
    'joblib'
]

setuptools.setup(
    name="exact-stream",
    version="0.1.0",
    description="Streaming estimators whose error bounds shrink to zero as the stream grows.",
    license="BSD-3-Clause",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=setuptools.find_packages(exclude=['test','examples','examples.*']),
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: BSD License",
        "Operating System :: OS Independent",
    ],
    scripts=['bin/exact-stream'],
    install_requires = requirements,
    python_requires='>=3.9',
    package_data={'exact_stream':['configs/*.yml']}
)
