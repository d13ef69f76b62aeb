import os.path
from setuptools import setup, find_packages

path = os.path.split(__file__)[0]
with open(os.path.join(path, "picotriage/__init__.py")) as f:
    version = f.readline().split("=")[1].strip().strip('"')

setup(
        name="picotriage",
        version=version,
        license="MIT",
        install_requires = ["attrs>=21.3.0", "ujson>=4.1", "numpy>=1.17", "networkx>=2.5"],
        extras_require = {"test": ["hypothesis>=5.0"]},
        python_requires=">=3.8",
        classifiers=[
            'Development Status :: 3 - Alpha',
            'Topic :: Scientific/Engineering :: Artificial Intelligence',
            'Intended Audience :: Science/Research',
            'License :: OSI Approved :: MIT License',
            'Programming Language :: Python :: 3',
            'Programming Language :: Python :: 3.8',
            'Programming Language :: Python :: 3.9',
            'Programming Language :: Python :: 3.10',
            'Programming Language :: Python :: 3.11',
            ],
        keywords="bayesian network triage sensor fusion",
        packages=find_packages(exclude=["tests"]),
        package_data={"picotriage": ["assets/*.bnet", "assets/*.json"]},
        entry_points={"console_scripts": ["picotriage = picotriage.cli:main"]},
        description="Casualty triage by Bayesian-network fusion of uncertain estimator outputs",
        long_description="""
picotriage
==========

Exact discrete Bayesian-network inference with virtual evidence, a small
text format for networks, and a fusion service that turns noisy per-field
estimator outputs into complete nine-field casualty assessments. Includes
the scoring rubric, a seeded scenario simulator and a latency benchmark.

Usage
-----

.. code:: python

    net = picotriage.default_triage_network()
    ev = picotriage.EvidenceSet(net).add_virtual("lower_ext_trauma", [0.05, 0.05, 0.9])
    picotriage.infer_marginals(net, ev)["severe_hemorrhage"]

From the shell::

    picotriage validate triage_default.bnet
    picotriage simulate default_scenario.json --seed 3 --format json
    picotriage bench triage_default.bnet --check
"""
)
