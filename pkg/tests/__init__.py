"""
Test package for AWS GWAS
""" 