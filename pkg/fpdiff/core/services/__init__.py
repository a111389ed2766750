"""
Domain services: generation, emission, inputs, harness, classification, oracle and campaigns.
"""
