"""
Meshgcn classifies brain surface meshes with residual spectral graph
convolutional networks and explains the predictions with Grad-CAM.
"""
