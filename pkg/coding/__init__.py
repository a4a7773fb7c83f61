# This file makes the coding folder a "Python package"
