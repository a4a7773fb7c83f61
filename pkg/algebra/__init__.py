# This file makes the algebra folder a "Python package"
# It allows other files to import from algebra.gf2
