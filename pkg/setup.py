#!/usr/bin/env python

from setuptools import find_packages, setup

with open('README.md') as f:
    long_description = f.read()

setup(name="drift-trust",
      version="0.1.0",
      description="Drift detection and trust scoring of tabular batch streams",
      long_description=long_description,
      long_description_content_type='text/markdown',
      author="drift-trust developers",
      classifiers=[
          'License :: OSI Approved :: Apache Software License',
          'Programming Language :: Python :: 3 :: Only',
          'Programming Language :: Python :: 3.8',
          'Programming Language :: Python :: 3.9',
          'Programming Language :: Python :: 3.10',
      ],
      python_requires='>=3.8',
      install_requires=[
          'pipelinewise-singer-python==1.*',
          'inflection==0.5.1',
          'joblib==1.2.0',
          'pandas>=1.5,<3',
          'numpy>=1.22,<2',
          'scipy>=1.8,<2',
          'scikit-learn>=1.1,<2',
          'matplotlib>=3.5,<4',
      ],
      extras_require={
          "test": [
              "pylint==2.12.*",
              'pytest==7.4.0',
              'pytest-cov==3.0.0',
          ]
      },
      entry_points="""
          [console_scripts]
          drift-trust=drift_trust:main
      """,
      packages=find_packages(exclude=['tests*']),
      )
