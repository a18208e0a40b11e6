# Data processing package 