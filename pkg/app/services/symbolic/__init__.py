"""
Exact symbolic engines: enveloping algebra of gl_n and intertwining chains
"""
