# This file makes the design folder a "Python package"
