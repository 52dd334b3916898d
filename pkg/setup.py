# Copyright (c) The market-efficiency authors.
# All rights reserved.
#
# This source code is licensed under the terms described in the LICENSE file in
# the root directory of this source tree.

from setuptools import find_packages, setup


def read_requirements():
    with open("requirements.txt") as fp:
        content = fp.readlines()
    return [line.strip() for line in content if line.strip() and not line.startswith("#")]


setup(
    name="market-efficiency",
    version="0.1.0",
    description="Multifractal detrended fluctuation analysis of market efficiency",
    long_description=open("README.md").read(),
    long_description_content_type="text/markdown",
    packages=find_packages(include=["market_efficiency", "market_efficiency.*"]),
    classifiers=[],
    python_requires=">=3.10",
    install_requires=read_requirements(),
    extras_require={"dev": ["pytest", "hypothesis"]},
    entry_points={
        "console_scripts": [
            "market-efficiency = market_efficiency.scripts.cli:run",
        ],
    },
    include_package_data=True,
)
