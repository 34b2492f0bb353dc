from setuptools import setup, find_packages

setup(
    name="maxrank",
    version="1.0.0",
    description="Certified constructive upper bounds on the rank of 3-tensors over R and C",
    packages=find_packages(where="src"),
    package_dir={"": "src"},
    package_data={
        "maxrank": ["reports.yml", "schemas/*.json", "plugins/*/plugin.json"],
    },
    install_requires=[
        "numpy>=1.22",
        "scipy>=1.8",
        "pyyaml>=6.0.1",
        "jinja2>=3.1.2",
        "jsonschema>=4.0.0",
    ],
    extras_require={
        "test": [
            "pytest>=7.0",
            "hypothesis>=6.0",
        ],
    },
    entry_points={
        "console_scripts": [
            "maxrank=maxrank.__main__:main",
        ],
    },
    python_requires=">=3.9",
)
