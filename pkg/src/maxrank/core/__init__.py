"""Core - Numerical substrate, decomposition routines, certification and bounds"""
