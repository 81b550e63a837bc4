"""
Test package for thetaspec
"""
