"""
Helper scripts
"""
