# This file makes the reports folder a "Python package"
