#!/usr/bin/env python

"""The setup script."""

from setuptools import setup, find_packages

with open('README.md') as readme_file:
    readme = readme_file.read()

requirements = [
    'numpy',
    'pandas',
    'scipy',
    'torch>=2.0.1',
    'tqdm',
    'trimesh',
]

test_requirements = ['pytest>=3', ]

setup(
    author="Floris De Feyter",
    author_email='floris.defeyter@kuleuven.be',
    python_requires='>=3.8',
    classifiers=[
        'Development Status :: 3 - Alpha',
        'Intended Audience :: Developers',
        'License :: OSI Approved :: MIT License',
        'Natural Language :: English',
        'Programming Language :: Python :: 3',
        'Programming Language :: Python :: 3.8',
        'Programming Language :: Python :: 3.9',
        'Programming Language :: Python :: 3.10',
    ],
    description="MeshGCN: residual Chebyshev graph convolutional networks "
    "for the classification of triangulated surface meshes, with "
    "mesh-adapted Grad-CAM.",
    entry_points={
        'console_scripts': [
            'meshgcn=meshgcn.cli:main',
        ],
    },
    install_requires=requirements,
    license="MIT license",
    long_description=readme,
    long_description_content_type='text/markdown',
    include_package_data=True,
    keywords='meshgcn',
    name='meshgcn',
    packages=find_packages(include=['meshgcn', 'meshgcn.*']),
    test_suite='tests',
    tests_require=test_requirements,
    url='https://github.com/florisdf/meshgcn',
    version='0.0.1-alpha.0',
    zip_safe=False,
)
