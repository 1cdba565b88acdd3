"""
URL configuration for the concordance project.

The JSON endpoints live in knots.urls; the admin lists stored knots and reports.
"""
from django.contrib import admin
from django.urls import path, include

urlpatterns = [
    path('admin/', admin.site.urls),
    path('', include('knots.urls')),
]
