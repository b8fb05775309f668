from setuptools import Extension, setup

# The compiled kernel is optional: the package falls back to the pure-Python
# twin in fanokit._kernel.pure when no extension is importable.
try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [Extension("fanokit._kernel._core", ["src/fanokit/_kernel/_core.pyx"])],
        compiler_directives={"language_level": "3", "boundscheck": False},
    )
except ImportError:
    extensions = []

# Metadata is duplicated from pyproject.toml so installs also work under
# pre-PEP-621 setuptools (no build isolation, old bundled toolchains).
setup(
    name="fanokit",
    version="0.1.0",
    description=(
        "Non-Archimedean functionals and optimal-degeneration solvers "
        "on Okounkov/moment polytope data"
    ),
    python_requires=">=3.10",
    install_requires=["numpy>=1.24"],
    extras_require={"test": ["pytest", "hypothesis"]},
    package_dir={"": "src"},
    packages=["fanokit", "fanokit._kernel"],
    package_data={"fanokit": ["fixtures/*.json"]},
    entry_points={"console_scripts": ["fanokit = fanokit.cli:main"]},
    ext_modules=extensions,
)
