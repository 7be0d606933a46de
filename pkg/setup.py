from setuptools import setup, find_packages

setup(
    name='engageplan',
    version='1.0.0',
    description='A simulator of customer engagement plans for peak-load reduction in residential communities',
    license='MIT',
    packages=find_packages(include=['scripts', 'scripts.*']),
    py_modules=["main"],
    package_data={'scripts': ['data/*.csv']},
    include_package_data=True,
    classifiers=[
        'Programming Language :: Python :: 3',
        'License :: OSI Approved :: MIT License',
        'Operating System :: OS Independent',
    ],
    python_requires='>=3.9',
    install_requires=[
        'numpy<2',
        'pandas>=1.5',
        'PyYAML',
        'pydantic>=2',
        'colorama',
    ],
    extras_require={
        'tests': [
            'pytest',
            'hypothesis',
        ]
    },
    entry_points={
        'console_scripts': [
            'engageplan = main:main',
        ]
    }
)
