# This file makes the analysis folder a "Python package"
