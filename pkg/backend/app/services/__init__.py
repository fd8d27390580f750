"""Geometry services: fields, phi families, decompositions, sprays, checks, builders"""
