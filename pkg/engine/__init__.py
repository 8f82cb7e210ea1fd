"""
Engine package
Tail distributions, fitting, goodness of fit, panel preparation and reporting
"""
