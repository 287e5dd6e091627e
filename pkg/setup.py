from setuptools import setup, find_packages

setup(
    package_dir={"": "src"},
    packages=find_packages("src"),
    use_scm_version={"write_to": "src/oemde/_version.py"},
    setup_requires=["setuptools_scm"],
)
